#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "wfqpsk/cli.hpp"
#include "wfqpsk/error.hpp"
#include "wfqpsk/numeric.hpp"

namespace wfqpsk {

namespace fs = std::filesystem;

namespace {

bool cell_less(const Cell& a, const Cell& b)
{
    if (a.index() != b.index()) {
        return a.index() < b.index();
    }
    return std::visit(
        [&b](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            return x < std::get<T>(b);
        },
        a);
}

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_real(x);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else {
                return x;
            }
        },
        c);
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, c);
}

}  // namespace

void Table::sort_rows()
{
    std::stable_sort(rows.begin(), rows.end(), [this](const auto& a, const auto& b) {
        for (std::size_t k : sort_keys) {
            if (cell_less(a[k], b[k])) {
                return true;
            }
            if (cell_less(b[k], a[k])) {
                return false;
            }
        }
        return false;
    });
}

std::string Table::to_csv() const
{
    std::string out;
    if (!meta.empty()) {
        out += '#';
        for (const auto& [k, v] : meta) {
            out += ' ' + k + '=' + v;
        }
        out += '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + columns[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += cell_text(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string Table::to_json() const
{
    nlohmann::ordered_json j;
    j["columns"] = columns;
    auto& m = j["meta"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta) {
        m[k] = v;
    }
    auto& rs = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& c : row) {
            r.push_back(cell_json(c));
        }
        rs.push_back(std::move(r));
    }
    return j.dump(1) + '\n';
}

OutputFile render_table(const RunConfig& cfg, const std::string& stem, Table table)
{
    table.sort_rows();
    if (cfg.format == "json") {
        return {stem + ".json", table.to_json()};
    }
    return {stem + ".csv", table.to_csv()};
}

void write_outputs(const RunConfig& cfg, const std::string& command, const CommandOutput& out)
{
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const fs::path staging = dir / (".staging-" + std::to_string(::getpid()));
    fs::remove_all(staging);
    fs::create_directories(staging);

    std::vector<std::string> names;
    for (const auto& f : out.files) {
        names.push_back(f.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        fs::remove_all(staging);
        throw Error("internal: duplicate output file name");
    }

    nlohmann::ordered_json manifest;
    manifest["tool"] = "wfqpsk";
    manifest["version"] = kToolVersion;
    manifest["command"] = command;
    manifest["seed"] = cfg.seed;
    manifest["format"] = cfg.format;
    manifest["files"] = names;
    manifest["warnings"] = out.warnings;
    auto& conf = manifest["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : resolved_config(cfg)) {
        conf[k] = v;
    }

    try {
        auto put = [&staging](const std::string& name, const std::string& bytes) {
            std::ofstream f(staging / name, std::ios::binary);
            f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!f) {
                throw Error("cannot write " + (staging / name).string());
            }
        };
        for (const auto& f : out.files) {
            put(f.name, f.bytes);
        }
        put("manifest.json", manifest.dump(1) + '\n');
        for (const auto& f : out.files) {
            fs::rename(staging / f.name, dir / f.name);
        }
        fs::rename(staging / "manifest.json", dir / "manifest.json");
        fs::remove_all(staging);
    } catch (...) {
        std::error_code ignored;
        fs::remove_all(staging, ignored);
        throw;
    }
}

int default_workers()
{
    if (const char* env = std::getenv("WFQPSK_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 4096) {
            throw ConfigError("WFQPSK_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        }
        return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace wfqpsk

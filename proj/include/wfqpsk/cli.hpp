#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "wfqpsk/config.hpp"

namespace wfqpsk {

using Cell = std::variant<double, std::int64_t, std::string, bool>;

/// A rectangular result. Rows are sorted on the `sort_keys` column indices
/// before rendering, so completion order of parallel work never shows.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::size_t> sort_keys;
    std::vector<std::pair<std::string, std::string>> meta;  // rendered as a leading "# k=v ..." line

    void sort_rows();
    std::string to_csv() const;
    std::string to_json() const;
};

/// One file of a command's output, relative to the output directory.
struct OutputFile {
    std::string name;
    std::string bytes;
};

struct CommandOutput {
    std::vector<OutputFile> files;
    std::vector<std::string> warnings;
};

/// Commands are pure given (config, workers): they return file contents and
/// never touch the output directory.
CommandOutput cmd_sweep_mi(const RunConfig& cfg, int workers);
CommandOutput cmd_sweep_kgr(const RunConfig& cfg, int workers);
CommandOutput cmd_lock(const RunConfig& cfg, int workers);
CommandOutput cmd_allan(const RunConfig& cfg, int workers);
CommandOutput cmd_asd(const RunConfig& cfg, int workers);
CommandOutput cmd_montecarlo(const RunConfig& cfg, int workers);
CommandOutput cmd_skellam(const RunConfig& cfg, int workers);

/// Per-condition aggregate over the lock seeds.
struct LockConditionStats {
    std::string label;
    std::vector<double> rms;  // one per seed
    std::vector<double> taus;
    std::vector<double> adev_mean;
    std::vector<double> adev_std;
    std::vector<double> freqs;
    std::vector<double> asd_mean;
    std::vector<double> asd_std;
    bool allan_monotone = false;  // mean curve nonincreasing over the tau grid
    PhaseTrace first_trace;       // trace of the first seed
};

/// Runs four_conditions for seeds cfg.seed, cfg.seed + 1, ... and aggregates
/// RMS, overlapping Allan deviation and Welch ASD per condition.
std::vector<LockConditionStats> lock_study(const RunConfig& cfg, int workers);

/// Renders `table` as name.csv or name.json according to cfg.format.
OutputFile render_table(const RunConfig& cfg, const std::string& stem, Table table);

/// Writes every file plus manifest.json into cfg.out_dir through a staging
/// directory; on failure nothing is left behind.
void write_outputs(const RunConfig& cfg, const std::string& command, const CommandOutput& out);

/// Worker count from WFQPSK_WORKERS, else the number of hardware threads.
int default_workers();

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the `wfqpsk` executable. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace wfqpsk

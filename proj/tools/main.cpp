#include "wfqpsk/cli.hpp"

int main(int argc, char** argv)
{
    return wfqpsk::run_cli(argc, argv);
}

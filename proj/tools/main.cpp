#include "cli.hpp"

int main(int argc, char** argv) { return evoeq::cli::run_cli(argc, argv); }

#include "matchup/cli.hpp"

int main(int argc, char** argv) { return matchup::run_cli(argc, argv); }

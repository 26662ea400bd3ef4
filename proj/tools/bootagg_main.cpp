#include "bootagg/cli.hpp"

int main(int argc, char** argv) { return bootagg::run_cli(argc, argv); }

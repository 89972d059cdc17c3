#include "respan/cli.hpp"

int main(int argc, char** argv) { return respan::run_cli(argc, argv); }

#include "brt/cli.hpp"

int main(int argc, char** argv) { return brt::run_cli(argc, argv); }

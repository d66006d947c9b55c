#include "gridci/cli.hpp"

int main(int argc, char** argv) { return gridci::run_cli(argc, argv); }

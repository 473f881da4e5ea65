#include "impsel/cli.hpp"

int main(int argc, char** argv) { return impsel::run_cli(argc, argv); }

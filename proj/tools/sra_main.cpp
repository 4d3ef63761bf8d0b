#include "sra/cli.hpp"

int main(int argc, char** argv) { return sra::run_cli(argc, argv); }

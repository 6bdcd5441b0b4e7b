#include "isac/cli.hpp"

int main(int argc, char** argv) { return isac::run_cli(argc, argv); }

#include "shiftcraft/cli.hpp"

int main(int argc, char** argv) { return shiftcraft::run_cli(argc, argv); }

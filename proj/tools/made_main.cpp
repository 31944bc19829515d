#include "made/cli.hpp"

int main(int argc, char** argv) { return made::run_cli(argc, argv); }

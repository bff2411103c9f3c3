#include "nscore/cli.hpp"

int main(int argc, char** argv) { return nscore::run_cli(argc, argv); }

#include "hjbpi/cli.hpp"

int main(int argc, char** argv) { return hjbpi::run_cli(argc, argv); }

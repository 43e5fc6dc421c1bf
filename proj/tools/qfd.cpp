#include "qfd/cli.hpp"

int main(int argc, char** argv) { return qfd::run_cli(argc, argv); }

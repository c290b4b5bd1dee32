#include "clusterdist/cli.hpp"

int main(int argc, char **argv) { return clusterdist::run_cli(argc, argv); }

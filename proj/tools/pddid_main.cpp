#include "pddid/cli.hpp"

int main(int argc, char** argv) { return pddid::run_cli(argc, argv); }

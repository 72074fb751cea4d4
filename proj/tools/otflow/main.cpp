#include "otflow/cli.hpp"

int main(int argc, char** argv) { return otflow::cli::main(argc, argv); }

#include "segwave/cli.hpp"

int main(int argc, char** argv) { return segwave::cli::main_entry(argc, argv); }

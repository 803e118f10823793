#include "cli/commands.hpp"

int main(int argc, char** argv) { return uqxai::cli::run(argc, argv); }

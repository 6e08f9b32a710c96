#include "nlc/cli/cli.hpp"

int main(int argc, char** argv) { return nlc::cli::run(argc, argv); }

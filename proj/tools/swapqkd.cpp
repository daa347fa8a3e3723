#include "swapqkd/cli/app.hpp"

int main(int argc, char** argv) { return swapqkd::cli::run(argc, argv); }

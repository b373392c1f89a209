#include "detox/cli/app.hpp"

int main(int argc, char** argv) { return detox::cli::run(argc, argv); }

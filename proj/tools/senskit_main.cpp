#include "senskit/cli.hpp"

int main(int argc, char** argv) { return senskit::cli::run(argc, argv); }

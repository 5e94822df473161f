#include "metagym/cli.hpp"

int main(int argc, char** argv) { return metagym::cli::run(argc, argv); }

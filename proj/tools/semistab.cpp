#include <semistab/cli.hpp>

int main(int argc, char** argv) { return semistab::cli::run(argc, argv); }

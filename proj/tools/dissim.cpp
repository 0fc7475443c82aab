#include <dissim/driver.hpp>

int main(int argc, char** argv) { return dissim::cli::run_main(argc, argv); }

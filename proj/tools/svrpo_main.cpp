#include "svrpo/experiment.hpp"

int main(int argc, char** argv) { return svrpo::run_main(argc, argv); }

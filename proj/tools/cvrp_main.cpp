#include "cvrp/bench.hpp"

int main(int argc, char** argv) {
    return cvrp::cli_main(argc, argv);
}

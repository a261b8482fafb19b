#include "nsim/cli.hpp"

int main(int argc, char** argv) {
    return nsim::run_cli({argv + 1, argv + argc});
}

#include "qspec/qubits.hpp"

#include <cstdio>

int main() {
    const qspec::RVector ev = qspec::eigenvals(qspec::GenericQubit{}, 2);
    std::printf("%g %g\n", ev(0), ev(1));
    return ev(1) - ev(0) == 5.0 ? 0 : 1;
}

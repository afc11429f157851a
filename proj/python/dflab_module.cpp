#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_dflab, m) {
    m.doc() = "Dirac-Fock variational laboratory";
}

#include <pybind11/pybind11.h>
PYBIND11_MODULE(subcam_core, m) { m.doc() = "subcam core bindings"; }

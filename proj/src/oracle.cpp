#include "cct/oracle.hpp"

// OracleSession and the point sources are header-only; this translation
// unit exists so the header is compiled with the library's warning flags.

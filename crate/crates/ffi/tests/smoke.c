#include <math.h>
#include <stdio.h>
#include <string.h>
#include "nodalgeom.h"

int main(void) {
    const double dims[2] = {3.141592653589793, 3.141592653589793};
    const int64_t mode[2] = {3, 2};
    NgField *f = NULL;
    if (ng_field_closed_form(NG_DOMAIN_KIND_RECTANGLE, dims, 2, 0.0, mode, 2, 96, &f) != NG_STATUS_OK) return 1;
    NgDecomposition *d = NULL;
    if (ng_nodal_decompose(f, 1e-12, &d) != NG_STATUS_OK) return 2;
    size_t n = 0;
    ng_nodal_count(d, &n);
    NgComponent c;
    if (ng_nodal_component(d, 99, &c) == NG_STATUS_OK) return 3;
    if (strlen(ng_last_error()) == 0) return 4;
    ng_nodal_free(d);
    ng_field_free(f);
    printf("%zu\n", n);
    return n == 6 ? 0 : 5;
}

#include <stdio.h>
#include "obe.h"

int main(void) {
    ObeTables *t = NULL;
    ObeResult *r = NULL;
    double e = 0.0;
    if (obe_tables_build(8, &t) != OBE_STATUS_OK) return 2;
    if (obe_solve_builtin("gauss3b", 0, 1, 8, 1.6921, 1, t, &r) != OBE_STATUS_OK) {
        fprintf(stderr, "%s\n", obe_last_error());
        return 3;
    }
    if (obe_result_state(r, 0, &e, NULL) != OBE_STATUS_OK) return 4;
    printf("%.12f\n", e);
    if (obe_solve_builtin("nope", 0, 1, 8, 1.0, 1, t, &r) != OBE_STATUS_INVALID_ARGUMENT) return 5;
    obe_result_free(r);
    obe_tables_free(t);
    return 0;
}

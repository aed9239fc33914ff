#include <stdio.h>
#include "bfcalc.h"

int main(void) {
    const uint8_t points[] = {1, 3, 2, 4};
    BfcPmc *pmc = NULL;
    BfcAlgebra *alg = NULL;
    size_t dim = 0;
    if (bfc_pmc_new(1, points, 2, &pmc) != BFC_STATUS_OK) {
        fprintf(stderr, "%s\n", bfc_last_error());
        return 2;
    }
    if (bfc_algebra_strand(pmc, &alg) != BFC_STATUS_OK || bfc_algebra_dim(alg, &dim) != BFC_STATUS_OK) {
        fprintf(stderr, "%s\n", bfc_last_error());
        return 2;
    }
    BfcStatus s = bfc_algebra_verify(alg, 10000);
    printf("dim %zu, verify %d\n", dim, (int)s);
    bfc_algebra_free(alg);
    bfc_pmc_free(pmc);
    return s == BFC_STATUS_OK ? 0 : 1;
}

#include <stdio.h>
#include <string.h>
#include "pdmod.h"

int main(void) {
    PdmodOperator *grad = NULL, *cc = NULL;
    if (pdmod_operator_gallery("grad", 3, "euclid", &grad) != PDMOD_STATUS_OK) return 10;
    if (pdmod_operator_cc(grad, 0, &cc) != PDMOD_STATUS_OK) return 11;
    bool ok = false;
    if (pdmod_verify_cc(cc, grad, &ok) != PDMOD_STATUS_OK || !ok) return 12;
    size_t rows = 0;
    pdmod_operator_shape(cc, NULL, &rows, NULL, NULL);
    char *text = NULL;
    if (pdmod_operator_to_string(cc, &text) != PDMOD_STATUS_OK) return 13;
    printf("rows=%zu\n%s", rows, text);
    pdmod_string_free(text);

    PdmodOperator *bad = NULL;
    PdmodStatus st = pdmod_operator_parse("dim 1\nunknowns u\neq a: (u\n", &bad);
    if (st != PDMOD_STATUS_SYNTAX || pdmod_last_error_message() == NULL) return 14;

    pdmod_operator_free(cc);
    pdmod_operator_free(grad);
    return 0;
}

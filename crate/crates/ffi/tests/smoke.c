#include <math.h>
#include <stdio.h>
#include <string.h>

#include "contention.h"

#define CHECK(cond)                                               \
    do {                                                          \
        if (!(cond)) {                                            \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, \
                    ctn_last_error_message());                    \
            return 1;                                             \
        }                                                         \
    } while (0)

int main(void) {
    CtnCodebook *cb = NULL;
    CHECK(ctn_codebook_build(2, 1e-6, &cb) == CTN_STATUS_OK);

    CtnEntry e;
    CHECK(ctn_codebook_entry(cb, 1, &e) == CTN_STATUS_OK);
    CHECK(e.threshold == 0.75 && e.probability == 0.125 && e.depth == 2);

    char word[8];
    size_t needed = 0;
    CHECK(ctn_codebook_codeword(cb, 5, word, sizeof word, &needed) == CTN_STATUS_OK);
    CHECK(strcmp(word, "0e1") == 0 && needed == 4);
    CHECK(ctn_codebook_codeword(cb, 5, word, 2, &needed) == CTN_STATUS_BUFFER_TOO_SMALL);

    double h = 0.0, d = 0.0;
    CHECK(ctn_codebook_entropy(cb, &h) == CTN_STATUS_OK && fabs(h - 3.0) < 1e-6);
    CHECK(ctn_codebook_expected_delay(cb, &d) == CTN_STATUS_OK && fabs(d - 2.0) < 1e-6);

    size_t idx = 0;
    CHECK(ctn_codebook_resolve(cb, 0.26, 0.49, &idx) == CTN_STATUS_OK && idx == 5);
    ctn_codebook_free(cb);

    double y = 0.0;
    CHECK(ctn_optimal_threshold(0.0, 1.0, 4, &y) == CTN_STATUS_OK && y == 0.75);
    CHECK(ctn_optimal_threshold(0.5, 0.2, 4, &y) == CTN_STATUS_INVALID_ARGUMENT);
    CHECK(strlen(ctn_last_error_message()) > 0);

    CtnBatchStats s;
    CHECK(ctn_simulate("correlated", 2, "discrete-mpa", 1000, 64, 1, &s) == CTN_STATUS_OK);
    CHECK(s.resolved == 1000);
    CHECK(ctn_simulate("iid", 3, "two-sided", 10, 64, 1, &s) == CTN_STATUS_INCOMPATIBLE);

    printf("ok %s\n", ctn_version());
    return 0;
}

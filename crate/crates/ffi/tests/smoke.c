#include <stdio.h>
#include <string.h>

#include "recordgraph.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    int64_t values[2] = {-1, 1};
    double probs[2] = {0.25, 0.75};
    RgIncrementLaw *law = NULL;
    CHECK(rg_law_new(values, probs, 2, &law) == RG_STATUS_OK);
    double c = 0.0;
    CHECK(rg_law_hitting_prob(law, &c) == RG_STATUS_OK);
    CHECK(c > 0.3333333333 && c < 0.3333333334);

    int64_t xs[6] = {-1, -1, 1, -1, -1, 2};
    RgWindow *w = NULL;
    CHECK(rg_window_fixed(-6, xs, 6, 0, 0, &w) == RG_STATUS_OK);
    int64_t kids[8];
    size_t n = 0;
    RgResolution kind;
    CHECK(rg_children_of(w, 0, kids, 8, &n, &kind) == RG_STATUS_OK);
    CHECK(kind == RG_RESOLUTION_RESOLVED && n == 3 && kids[0] == -1 && kids[2] == -3);

    RgTree *t = NULL;
    CHECK(rg_tree_parse("[(),()]", &t) == RG_STATUS_OK);
    CHECK(rg_tree_len(t) == 3);
    int64_t code[8];
    int64_t lo = 0;
    CHECK(rg_tree_encode(t, code, 8, &lo, &n) == RG_STATUS_OK);
    CHECK(lo == -3 && n == 3 && code[2] == 1);
    RgTree *back = NULL;
    CHECK(rg_tree_decode(lo, code, n, &back) == RG_STATUS_OK);
    char text[64];
    CHECK(rg_tree_serialize(back, text, sizeof text, &n) == RG_STATUS_OK);
    CHECK(strcmp(text, "0[-1(),-2()]") == 0);

    RgTree *bad = NULL;
    CHECK(rg_tree_parse("((", &bad) == RG_STATUS_PARSE);
    CHECK(rg_last_error(text, sizeof text, &n) == RG_STATUS_OK && n > 0);

    rg_tree_free(back);
    rg_tree_free(t);
    rg_window_free(w);
    rg_law_free(law);
    printf("ok %s\n", rg_version());
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "dcause.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            const char *e = dc_last_error();                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__,        \
                    __LINE__, #cond, e ? e : "no message");      \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: smoke FIXTURE_DIR\n");
        return 2;
    }
    char path[4096];
    DcModel *table = NULL;
    snprintf(path, sizeof path, "%s/medical.world.json", argv[1]);
    CHECK(dc_model_from_path(path, &table) == DC_STATUS_OK);

    bool responsive = false;
    CHECK(dc_is_responsive(table, "c", NULL, &responsive) == DC_STATUS_OK);
    CHECK(responsive);
    CHECK(dc_is_responsive(table, "c", "t", &responsive) == DC_STATUS_OK);
    CHECK(!responsive);

    char *causes = NULL;
    CHECK(dc_find_causes(table, "c", &causes) == DC_STATUS_OK);
    CHECK(strcmp(causes, "[[\"r\"],[\"t\"]]") == 0);
    dc_string_free(causes);

    double p = 0.0;
    CHECK(dc_counterfactual_probability(table, "r=take", "t=yes,c=yes", "r=dont_take", "c=yes", false, &p) ==
          DC_STATUS_OK);
    CHECK(fabs(p - 2.0 / 3.0) < 1e-12);

    DcModel *canon = NULL;
    snprintf(path, sizeof path, "%s/medical_g.canonical.json", argv[1]);
    CHECK(dc_model_from_path(path, &canon) == DC_STATUS_OK);
    uint64_t n = 0;
    CHECK(dc_count_params(canon, &n) == DC_STATUS_OK);
    CHECK(n == 13);

    CHECK(dc_is_responsive(canon, "c", NULL, &responsive) == DC_STATUS_WRONG_MODEL_KIND);
    CHECK(dc_last_error() != NULL);

    dc_model_free(canon);
    dc_model_free(table);
    printf("ok %s\n", dc_version());
    return 0;
}

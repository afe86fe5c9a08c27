#include <math.h>
#include <stdio.h>
#include <string.h>

#include "gendisc.h"

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            const char *msg = gd_last_error_message();                 \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,    \
                    #cond, msg ? msg : "no error message");            \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(void) {
    const char *json =
        "{\"type\":\"logreg\",\"labels\":[\"a\",\"b\"],\"T\":1,"
        "\"weights\":[[1.0],[-1.0]],\"biases\":[0.0,0.0]}";
    GdModel *lr = NULL;
    CHECK(gd_model_from_json(json, &lr) == GD_STATUS_OK);

    double y = 0.0;
    double p[2];
    CHECK(gd_predict_real(lr, &y, 1, p, 2) == GD_STATUS_OK);
    CHECK(p[0] == 0.5 && p[1] == 0.5);

    GdModel *nb = NULL;
    CHECK(gd_convert(lr, NULL, 0, &nb) == GD_STATUS_OK);
    enum GdModelKind kind;
    CHECK(gd_model_kind(nb, &kind) == GD_STATUS_OK && kind == GD_MODEL_KIND_DISC_NB);

    y = 1.25;
    double q[2];
    CHECK(gd_predict_real(lr, &y, 1, p, 2) == GD_STATUS_OK);
    CHECK(gd_predict_real(nb, &y, 1, q, 2) == GD_STATUS_OK);
    CHECK(fabs(p[0] - q[0]) <= 1e-10);

    double zero_prior[2] = {0.0, 1.0};
    GdModel *bad = NULL;
    CHECK(gd_convert(lr, zero_prior, 2, &bad) == GD_STATUS_BAD_INPUT);
    CHECK(strstr(gd_last_error_message(), "strictly positive") != NULL);

    char *text = NULL;
    CHECK(gd_model_to_json(nb, &text) == GD_STATUS_OK);
    CHECK(strstr(text, "\"disc_nb\"") != NULL);
    gd_string_free(text);

    double worst = -1.0;
    CHECK(gd_verify(1, 5, &worst) == GD_STATUS_OK && worst <= 1e-10);

    gd_model_free(nb);
    gd_model_free(lr);
    printf("gendisc %s: C smoke test passed\n", gd_version());
    return 0;
}

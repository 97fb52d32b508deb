#include <math.h>
#include <stdio.h>

#include "pilot_interference.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    PiScenario *scn = NULL;
    CHECK(pi_scenario_new(0.5, 1.0, 2, 0.8, 0.0, NULL, 0, &scn) == PI_STATUS_OK);

    PiReport r;
    CHECK(pi_prob_at_least(scn, 2, &r) == PI_STATUS_OK);
    CHECK(fabs(r.p_exact - 0.375) < 1e-12);
    CHECK(r.closed_form_case == PI_CASE_NONE);
    CHECK(pi_prob_at_least(scn, 3, &r) == PI_STATUS_OUT_OF_RANGE);

    char *msg = pi_last_error_message();
    CHECK(msg != NULL);
    pi_string_free(msg);
    pi_scenario_free(scn);

    PiScenario *bad = NULL;
    CHECK(pi_scenario_new(1.0, 0.5, 2, 1.0, 0.0, NULL, 0, &bad) == PI_STATUS_INVALID_CONFIG);
    CHECK(bad == NULL);

    PiFeasibleSet *fs = NULL;
    CHECK(pi_feasible_set_new(2, 5, 1e-3, 71.43e-6, 0.9e-3, 1.1e-3, &fs) == PI_STATUS_OK);
    CHECK(pi_feasible_set_len(fs) == 1);
    double lo, hi;
    CHECK(pi_feasible_set_interval(fs, 0, &lo, &hi) == PI_STATUS_OK);
    CHECK(fabs(lo - (1e-3 - 71.43e-6)) < 1e-12);
    CHECK(pi_feasible_set_interval(fs, 1, &lo, &hi) == PI_STATUS_OUT_OF_RANGE);
    pi_feasible_set_free(fs);

    printf("ok %s\n", pi_version());
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "vqpm.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "line %d: %s\n", __LINE__, #cond);        \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    VqpmInstance *inst = NULL;
    CHECK(vqpm_instance_new(2, &inst) == VQPM_STATUS_OK);
    CHECK(vqpm_instance_set(inst, 0, 0, -1.0) == VQPM_STATUS_OK);
    CHECK(vqpm_instance_set(inst, 0, 1, 2.0) == VQPM_STATUS_OK);
    CHECK(vqpm_instance_set(inst, 1, 1, -1.0) == VQPM_STATUS_OK);
    CHECK(vqpm_instance_set(inst, 1, 0, 1.0) == VQPM_STATUS_INVALID_ARGUMENT);
    CHECK(vqpm_last_error() != NULL);

    double e = 0.0;
    CHECK(vqpm_instance_energy(inst, "11", &e) == VQPM_STATUS_OK);
    CHECK(e == 0.0);
    CHECK(vqpm_instance_energy(inst, "10", &e) == VQPM_STATUS_OK);
    CHECK(e == -1.0);

    double min_energy = 0.0, gap = 0.0;
    uint64_t argmin = 0;
    size_t degeneracy = 0;
    CHECK(vqpm_brute_force(inst, &min_energy, &argmin, &gap, &degeneracy) == VQPM_STATUS_OK);
    CHECK(min_energy == -1.0 && degeneracy == 2 && gap == 0.0);

    VqpmRunConfig cfg = vqpm_run_config_default();
    cfg.variational = false;
    VqpmResult *res = NULL;
    CHECK(vqpm_run(inst, &cfg, "none", &res) == VQPM_STATUS_OK);
    CHECK(vqpm_result_found(res) != NULL && strlen(vqpm_result_found(res)) == 2);
    CHECK(vqpm_result_target_probability(res) >= 0.5);
    VqpmTermination term;
    CHECK(vqpm_result_termination(res, &term) == VQPM_STATUS_OK);
    CHECK(term == VQPM_TERMINATION_SUCCESS_BY_TARGET);
    vqpm_result_free(res);

    CHECK(vqpm_run(inst, &cfg, "bogus", &res) == VQPM_STATUS_INVALID_ARGUMENT);
    vqpm_instance_free(inst);

    double r = 0.0;
    CHECK(vqpm_convergence_ratio(0.0, 1.5707963267948966, &r) == VQPM_STATUS_OK);
    CHECK(fabs(r - 0.7071067811865476) < 1e-12);
    puts("ok");
    return 0;
}

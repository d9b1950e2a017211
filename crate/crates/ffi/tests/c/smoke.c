#include <math.h>
#include <stdio.h>
#include "projreg.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s\n", __LINE__, #cond); return 1; } } while (0)

int main(void) {
    ProjregRng *rng = projreg_rng_new(42);
    uint64_t first = 0;
    CHECK(projreg_rng_next_u64(rng, &first) == PROJREG_STATUS_OK);
    CHECK(first == 12578764544318200737ULL);

    double w[50];
    for (int i = 0; i < 50; i++) w[i] = (double)((i * 37) % 23 - 11) / 7.0;

    ProjregSamplerConfig cfg = projreg_sampler_config_default();
    cfg.density = 0.1;
    cfg.experiments = 4;
    ProjregSampler *sampler = NULL;
    CHECK(projreg_sampler_new(&cfg, &sampler) == PROJREG_STATUS_OK);

    ProjregDraw *draw = NULL;
    CHECK(projreg_sampler_draw(sampler, w, 50, rng, true, &draw) == PROJREG_STATUS_OK);
    CHECK(projreg_draw_mask_count(draw) == 4);

    size_t idx[5], len = 0;
    CHECK(projreg_draw_mask(draw, 0, idx, 5, &len) == PROJREG_STATUS_OK);
    CHECK(len == 5);

    double value = 0.0, grad[50];
    CHECK(projreg_penalty(PROJREG_PENALTY_FAMILY_PROPOSED_SQRT, 1.0, true, w, 50, draw, &value, grad)
          == PROJREG_STATUS_OK);
    CHECK(value > 0.0 && isfinite(value));
    CHECK(projreg_sampler_commit(sampler, draw) == PROJREG_STATUS_OK);

    cfg.density = -1.0;
    ProjregSampler *bad = NULL;
    CHECK(projreg_sampler_new(&cfg, &bad) == PROJREG_STATUS_INVALID_ARGUMENT);
    char msg[128];
    CHECK(projreg_last_error(msg, sizeof msg) > 0);

    projreg_draw_free(draw);
    projreg_sampler_free(sampler);
    projreg_rng_free(rng);
    printf("ok %s\n", projreg_version());
    return 0;
}

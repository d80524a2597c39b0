#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ripple_opf.h"

int main(void) {
    RopfNetwork *net = NULL;
    if (ropf_network_preset("statcom_toy", &net) != ROPF_STATUS_OK) {
        fprintf(stderr, "preset: %s\n", ropf_last_error());
        return 1;
    }
    if (ropf_network_bus_count(net) != 2) return 2;

    char *json = NULL;
    if (ropf_opf(net, NULL, &json) != ROPF_STATUS_OK) {
        fprintf(stderr, "opf: %s\n", ropf_last_error());
        return 3;
    }
    if (strstr(json, "\"objective_value\"") == NULL) return 4;
    ropf_string_free(json);

    double v[8] = {240, 0, -120, -207.8461, -120, 207.8461, 0, 0};
    double i[8] = {10, 0, 0, 0, 0, 0, -10, 0};
    double re = 0, im = 0;
    if (ropf_ripple_phasor(v, i, 4, &re, &im) != ROPF_STATUS_OK) return 5;
    if (fabs(re - 2400.0) > 1e-9 || fabs(im) > 1e-9) return 6;

    RopfNetwork *bad = NULL;
    if (ropf_network_preset("nope", &bad) != ROPF_STATUS_INVALID_INPUT) return 7;
    if (ropf_last_error() == NULL) return 8;

    ropf_network_free(net);
    puts("ok");
    return 0;
}

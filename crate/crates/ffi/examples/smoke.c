/* Build: cargo build -p qkdnet-ffi --release
 *        cc examples/smoke.c -Iinclude ../../target/release/libqkdnet_ffi.a -lm -lpthread -ldl -o smoke */
#include <stdio.h>
#include "qkdnet.h"

int main(void) {
    double rate = 0.0;
    if (qkd_bb84_rate(20.0, QKD_PROFILE_COLD, &rate) != QKD_STATUS_OK) {
        fprintf(stderr, "%s\n", qkd_last_error());
        return 1;
    }
    printf("bb84 cold, 20 dB: %.6e bit/s\n", rate);

    QkdGraph *g = NULL;
    QkdAnalysis *a = NULL;
    if (qkd_graph_generate(80.0, 10, 5, 3.5, 7, &g) != QKD_STATUS_OK ||
        qkd_analysis_new(g, 1.0, 2, &a) != QKD_STATUS_OK) {
        fprintf(stderr, "%s\n", qkd_last_error());
        qkd_graph_free(g);
        return 1;
    }
    double cap = 0.0;
    qkd_analysis_capacity(a, QKD_SOLUTION_TF_COOLED, &cap);
    printf("tf cooled network capacity: %.6e bit/s\n", cap);
    qkd_analysis_free(a);
    qkd_graph_free(g);
    return 0;
}

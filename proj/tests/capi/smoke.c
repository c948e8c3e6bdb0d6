#include <math.h>
#include <stdio.h>
#include <string.h>

#include "latarb/latarb.h"

#define EXPECT(cond)                                                  \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    double d = 0.0, m1 = 0.0, m2 = 0.0, q = 0.0, delta = 0.0, ret = 0.0;
    latarb_book *buy = NULL, *sell = NULL;
    latarb_exchange_profile p = {0.001, NAN, 0};

    EXPECT(latarb_total_latency_moments(10.0, 100.0, 9.7, 94.09, 3, &m1, &m2) == LATARB_OK);
    EXPECT(latarb_crra_bound(0.0009, 2.0, m1, m2, &d) == LATARB_OK);
    EXPECT(d > 0.0 && d < 0.1);
    EXPECT(latarb_crra_bound(0.0009, 0.5, m1, m2, &d) == LATARB_INVALID_ARGUMENT);
    EXPECT(strlen(latarb_last_error()) > 0);

    EXPECT(latarb_book_create("a", 60, &buy) == LATARB_OK);
    EXPECT(latarb_book_create("b", 60, &sell) == LATARB_OK);
    EXPECT(latarb_book_add_level(buy, 0, 99.0, 1.0) == LATARB_OK);
    EXPECT(latarb_book_add_level(buy, 1, 100.0, 1.0) == LATARB_OK);
    EXPECT(latarb_book_add_level(sell, 0, 102.0, 1.0) == LATARB_OK);
    EXPECT(latarb_book_add_level(sell, 1, 103.0, 1.0) == LATARB_OK);
    EXPECT(latarb_optimal_quantity(buy, sell, &p, &p, 200, &q, &delta, &ret) == LATARB_OK);
    EXPECT(q == 1.0);
    EXPECT(fabs(delta - (log(102.0 * 0.999) - log(100.0 * 1.001))) < 1e-12);
    latarb_book_free(buy);
    latarb_book_free(sell);

    printf("latarb %s ok\n", latarb_version());
    return 0;
}

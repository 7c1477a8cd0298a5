#include <stdio.h>
#include "traster.h"

int main(void) {
    int32_t v[2 * 2 * 3] = {1, 1, 2, 3, 3, 3, 1, 2, 2, 3, 3, 4};
    TrasterSeries *s = NULL;
    if (traster_build(v, 2, 2, 3, 2, 6, &s) != TRASTER_STATUS_OK) {
        fprintf(stderr, "%s\n", traster_last_error());
        return 1;
    }
    int32_t x = 0;
    if (traster_get_cell(s, 1, 1, 2, &x) != TRASTER_STATUS_OK || x != 4) return 2;
    TrasterCells *cells = NULL;
    if (traster_get_cells(s, 1, 2, 2, 0, 1, 0, 2, &cells) != TRASTER_STATUS_OK) return 3;
    size_t n = traster_cells_len(cells);
    const TrasterCell *c = traster_cells_data(cells);
    if (n != 2 || c[0].row != 0 || c[0].col != 1 || c[1].col != 2) return 4;
    traster_cells_free(cells);
    if (traster_get_cell(s, 2, 0, 0, &x) != TRASTER_STATUS_OUT_OF_RANGE) return 5;
    traster_free(s);
    printf("ok\n");
    return 0;
}

#include <stdio.h>
#include <stdlib.h>
#include "motifmdl.h"

static const char *CSV =
    "graph_id,src,dst,src_type,dst_type,mult\n"
    "a,0,1,A,B,1\na,1,2,B,C,1\n"
    "b,0,1,A,B,2\nb,1,2,B,C,2\n"
    "c,0,1,A,B,1\nc,1,2,B,C,1\nc,2,0,C,A,1\n";

int main(void) {
    MotifmdlDatabase *db = NULL;
    MotifmdlModel *model = NULL;
    if (motifmdl_database_from_csv(CSV, &db) != MOTIFMDL_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", motifmdl_last_error());
        return 1;
    }
    size_t n = 0;
    motifmdl_database_len(db, &n);
    if (motifmdl_fit(db, 3, 4, 100000, false, &model) != MOTIFMDL_STATUS_OK) {
        fprintf(stderr, "fit: %s\n", motifmdl_last_error());
        return 1;
    }
    double *scores = malloc(n * sizeof(double));
    double total = 0;
    motifmdl_model_scores(model, scores, n);
    motifmdl_model_total_bits(model, &total);
    char *json = NULL;
    motifmdl_model_table_json(model, &json);
    printf("graphs=%zu total=%.3f first=%.3f json=%c\n", n, total, scores[0], json[0]);
    if (motifmdl_fit(db, 2, 4, 100000, false, &model) != MOTIFMDL_STATUS_CONFIG) {
        return 1;
    }
    motifmdl_string_free(json);
    free(scores);
    motifmdl_model_free(model);
    motifmdl_database_free(db);
    return 0;
}

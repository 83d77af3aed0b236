#include <stdio.h>
#include "secgame.h"

static const char *SPEC =
    "{\"n\": 2, \"weights\": [2.0, 1.0], \"cost_attacker\": 1.0, \"cost_defender\": 1.0,"
    " \"budget_attacker\": 0.2, \"budget_defender\": 0.3, \"model\": \"ProportionForm\","
    " \"attack_eff\": {\"family\": \"Power\", \"a\": 1.0},"
    " \"defence_eff\": {\"family\": \"Power\", \"a\": 1.0}}";

int main(void) {
    SgGame *game = NULL;
    SgEquilibrium *eq = NULL;
    if (sg_game_from_json(SPEC, &game) != SG_STATUS_OK || sg_solve(game, &eq) != SG_STATUS_OK) {
        fprintf(stderr, "error: %s\n", sg_last_error());
        sg_game_free(game);
        return 1;
    }
    double x[2], y[2], ua, ud;
    sg_equilibrium_attacker(eq, x, 2);
    sg_equilibrium_defender(eq, y, 2);
    sg_equilibrium_utilities(eq, &ua, &ud);
    SgVerification v;
    sg_verify(game, eq, 1e-4, &v);
    printf("D%u x=(%.6f, %.6f) y=(%.6f, %.6f) U_A=%.6f U_D=%.6f verified=%d\n",
           sg_equilibrium_domain(eq), x[0], x[1], y[0], y[1], ua, ud, v.passed);
    sg_equilibrium_free(eq);
    sg_game_free(game);
    return v.passed ? 0 : 1;
}

#!/usr/bin/env python3
"""Quick look at a suite output directory: capacities, prices, EUE, calibration."""
import csv, json, sys

out = sys.argv[1] if len(sys.argv) > 1 else "out"

def rows(path):
    try:
        with open(path) as f:
            return list(csv.DictReader(f))
    except FileNotFoundError:
        return []

print("== capacities (EOM_VOLL)")
for r in rows(f"{out}/EOM_VOLL/capacities.csv"):
    print(f"  {r['name']:10s} {float(r['power_mw']):10.3f} MW", end="")
    if r["kind"] == "storage":
        print(f"  {float(r['energy_mwh']):10.1f} MWh  dur {float(r['duration_h']):6.2f} h", end="")
    print()

for run in ("EOM_VOLL", "EOM_PC_OPT_MIX"):
    ps = sorted((float(r["price_per_mwh"]) for r in rows(f"{out}/{run}/prices.csv")), reverse=True)
    if ps:
        above = sum(1 for p in ps if p > 7511 * 0.999)
        print(f"== {run}: top prices {[round(p) for p in ps[:6]]}  (>~PC: {above})")

print("== suite summary")
for r in rows(f"{out}/suite_summary.csv"):
    print(f"  {r['run']:16s} eue={float(r['eue_mwh']):9.4f}  lossPct={float(r['welfare_loss_pct_tc']):9.5f}"
          f"  mu={float(r['mu_price_served']):8.2f}  lcm={float(r['lambda_cm']):10.1f}  lct={float(r['lambda_ct']):8.1f}")

print("== calibration")
for r in rows(f"{out}/calibration.csv"):
    req = r["required_credit"] or "-"
    print(f"  {r['technology']:10s} inst={float(r['installed_mw']):9.3f}  NCuc={float(r['net_cone_uncredited_per_mw_yr']):12.1f}"
          f"  req_cc={req}  est_cc={r['estimated_credit'] or '-'}")

creds = rows(f"{out}/credits.csv")
if creds:
    print("== credits")
    for r in creds:
        d = r["duration_h"]
        print(f"  {r['resource']:10s} {('@'+d+'h') if d else '':9s} cc={float(r['credit']):.4f}")
try:
    sw = rows(f"{out}/sweep.csv")
    if sw:
        print("== sweep")
        for r in sw:
            print(f"  k={r['factor']}: d_eue={float(r['d_eue']):+.4f} d_lcm={float(r['d_lambda_cm']):+.1f}"
                  f" d_sw={float(r['d_welfare']):+.1f} d_mu={float(r['d_mu_price']):+.3f}")
except Exception:
    pass

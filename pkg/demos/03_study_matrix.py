# %% [markdown]
# # The full study
#
# 224 scenarios: seven locations, four fault types, four resistance levels
# and two OMMC negative-sequence controls. Then the qualitative checks.

# %%
import time

import numpy as np

from ibrdiff import ELEMENTS, StudyConfig, check_findings, run_matrix

study = StudyConfig()
t0 = time.perf_counter()
results = run_matrix(study)
print(f"{len(results)} scenarios in {time.perf_counter() - t0:.2f} s")

# %%
print(check_findings(results, study).format())

# %% [markdown]
# Trip counts per fault type and control, internal faults only.

# %%
for ft in ("AG", "AB", "ABG", "ABC"):
    for control in ("C1", "C2"):
        rows = [r for r in results if r.internal and r.fault.fault_type.value == ft and r.control == control]
        counts = np.array([[r.decisions[e].trip for e in ELEMENTS] for r in rows]).sum(axis=0)
        print(f"{ft:>3} {control}: " + "  ".join(f"{e}={n:2d}/{len(rows)}" for e, n in zip(ELEMENTS, counts)))

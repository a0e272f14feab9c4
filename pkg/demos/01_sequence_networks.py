# %% [markdown]
# # Sequence networks of the collector cable
#
# Build the three sequence networks for a fault in the middle of the cable,
# look at the Thevenin equivalents seen from the fault, and solve one fault
# with and without negative-sequence current from the OMMC.

# %%
from ibrdiff import FaultSpec, TestSystemConfig, build_sequence_networks, default_policies
from ibrdiff.network import is_open
from ibrdiff.phasor import polar

cfg = TestSystemConfig()
fault = FaultSpec("AG", "F3")

# %%
for control in ("C1", "C2"):
    net = build_sequence_networks(cfg, fault, default_policies(control))
    print(f"--- OMMC in {control}")
    for s, name in enumerate(("zero", "positive", "negative")):
        z, e = net.thevenin(s)
        shown = "open" if is_open(z) else f"{z:.4f}"
        print(f"{name:>9}: Z = {shown}" + (f", E = {e:.4f}" if e is not None else ""))

# %% [markdown]
# With C1 the negative-sequence network has no closed branch, so the
# single-phase-to-ground loop is broken and no fault current flows.

# %%
for control in ("C1", "C2"):
    sol = build_sequence_networks(cfg, fault, default_policies(control)).solve()
    mag, ang = polar(sol.fault_current.zero)
    print(f"{control}: |If| = {sol.i_fault_magnitude:.4f} p.u., I0 = {mag:.4f} at {ang:.1f} deg")

# %%
sol = build_sequence_networks(cfg, FaultSpec("ABG", "F2", 2.5, 10.0), default_policies("C1")).solve()
print("P1 (abc):", [f"{x:.3f}" for x in sol.p1])
print("P2 (abc):", [f"{x:.3f}" for x in sol.p2])

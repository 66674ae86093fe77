"""
Golay (23,12): split-form bounds from the weight distribution
=============================================================

For a binary linear code under BPSK the bounds reduce to one-dimensional
thresholds.  The sphere-bound radius and the inner radius of the
tangential-sphere bound do not depend on the noise level; the tangential
bound's threshold does.
"""

from mlbounds import bounds as bd
from mlbounds.codes import golay_23_12
from mlbounds.spectrum import weight_distribution

weights = {d: a for d, a in weight_distribution(golay_23_12()).items() if d}
n = 23
print("weights:", weights)

for snr_db in (0.0, 2.0, 4.0, 6.0):
    ch = bd.ChannelParams.from_snr_db(snr_db, n, float(n))
    sb = bd.binary_sphere_bound(weights, n, ch)
    tb = bd.binary_tangential_bound(weights, n, ch)
    tsb = bd.binary_tsb(weights, n, ch)
    print(
        f"{snr_db:4.1f} dB  SB {sb.value:.4e} (r1={sb.optimal_parameter:.6f})"
        f"  TB {tb.value:.4e} (z*={tb.optimal_parameter:.4f})"
        f"  TSB {tsb.value:.4e} (r1={tsb.optimal_parameter:.6f})"
    )

# r1 repeats exactly down the SB and TSB columns; z* moves with sigma

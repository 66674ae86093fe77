"""
A small 4-AM trellis: spectra of a code with unequal codeword energies
=====================================================================

Codewords of a trellis-coded 4-AM scheme do not all have the same energy,
so the Euclidean spectrum alone does not fix the geometry of a pair.  The
triangle spectrum records (E1, E2, D) for every pair and drives the
tangential bounds.
"""

from mlbounds import bounds as bd
from mlbounds.spectrum import euclidean_spectrum, triangle_spectrum
from mlbounds.trellis import average_energy, convolutional_trellis, format_trellis

# memory-1 rate-1/2 encoder, each pair of output bits mapped to one 4-AM level
tr = convolutional_trellis([0b11, 0b10], 3, [-3.0, -1.0, 1.0, 3.0])
print(format_trellis(tr)[:400], "...\n")

dspec = euclidean_spectrum(tr)
tspec = triangle_spectrum(tr)
print(f"n = {tr.n}, mean energy {average_energy(tr):.3f}")
print(f"{len(dspec.entries)} distances, {len(tspec.entries)} triangle entries")
print("smallest distances:", sorted(dspec.entries.items())[:5])

###############################################################################
# The Euclidean spectrum is the D-marginal of the triangle spectrum.

assert dspec.entries.keys() == tspec.marginal().entries.keys()

for snr_db in (4.0, 8.0, 12.0):
    ch = bd.ChannelParams.from_snr_db(snr_db, tr.n, average_energy(tr))
    print(
        f"{snr_db:5.1f} dB  union {bd.union_bound(dspec, ch).value:.3e}"
        f"  TB {bd.tangential_bound_general(tspec, ch).value:.3e}"
        f"  TSB {bd.tangential_sphere_bound_general(tspec, ch).value:.3e}"
    )

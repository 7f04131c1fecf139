"""OFDM receiver chain: SFO/STO estimation under CFO, compensation, BER.

The offset converter is -200 ppm slow, 0.03 periods late, and the analog
front end adds a 5% carrier-frequency offset plus a 0.3 rad phase offset
(common to both converters, since they digitize the same rotated signal).
The timing estimator works on the real component alone and is insensitive
to the carrier rotation; after Farrow compensation a data-aided linear
phase fit removes the CFO/PO and the 16-QAM payload demodulates error-free.
"""

import numpy as np

from farrowsync import (
    EstimatorConfig,
    OfdmSpec,
    add_awgn,
    apply_cfo_po,
    ber_qam16,
    design_wideband,
    estimate,
    gen_ofdm,
    residual_phase_fit,
    stream_compensate,
)

delta, eps = -200e-6, 0.03
cfo, po = 0.05, 0.3
snr_db = 60.0

spec = OfdmSpec()  # 2048 FFT, 1536 active 16-QAM subcarriers, CP 256
sampler = gen_ofdm(spec, seed=1)
total = spec.total_len
print(f"burst: {spec.n_symbols} symbols x {spec.symbol_len} samples")

comp = design_wideband(order=7, taps=24)
margin = int(np.ceil(total * abs(delta) + eps)) + comp.taps
t1 = np.arange(total + margin) * (1 + delta) + eps
x0 = sampler.reference_grid()
x1 = sampler.eval(t1)

# carrier impairments rotate the continuous signal seen by both converters
z0 = apply_cfo_po(x0, cfo, po, spec.fft_size)
z1 = add_awgn(apply_cfo_po(x1, cfo, po, spec.fft_size), snr_db, seed=2)

est_bank = design_wideband(order=3, taps=24)
r = estimate(z0, z1, est_bank, EstimatorConfig(n_samples=256, component="real"))
print(f"estimated from 256 real samples: delta = {r.delta_hat * 1e6:+.2f} ppm "
      f"(true {delta * 1e6:+.0f}), eps = {r.epsilon_hat:.5f} (true {eps})")

y = stream_compensate(comp, z1, r.delta_hat, r.epsilon_hat)
grid = np.zeros(total, dtype=complex)
idx = np.arange(total) + comp.latency - (comp.taps - 1)
ok = (idx >= 0) & (idx < len(y))
grid[ok] = np.nan_to_num(y[idx[ok]])

ber_pre = ber_qam16(sampler.demodulate(z1[:total]), sampler.symbols)
eq = sampler.demodulate(grid)
centers = np.arange(spec.n_symbols) * spec.symbol_len + spec.cp + spec.fft_size / 2
slope, intercept = residual_phase_fit(
    eq.ravel(), sampler.symbols.ravel(), np.repeat(centers, spec.active)
)
print(f"residual phase fit: slope -> CFO {slope * spec.fft_size / (2 * np.pi):.4f} "
      f"subcarrier spacings (true {cfo}), intercept {intercept:.3f} rad (true {po})")

grid *= np.exp(-1j * (slope * np.arange(total) + intercept))
ber_post = ber_qam16(sampler.demodulate(grid), sampler.symbols)
print(f"BER before compensation: {ber_pre:.3f}  ->  after: {ber_post:.6f}")

"""Monte-Carlo sweep campaigns: NMSE vs SNR and NMSE vs rate offset.

Runs reduced-size versions of the two OFDM sweep experiments and prints the
aggregate rows.  The full campaigns (and their CSV outputs for plotting) are
available from the command line, e.g.::

    farrowsync --experiment ex4 --trials 1000 --out results/
    farrowsync --experiment ex5 --trials 1000 --out results/
"""

import tempfile

from farrowsync import ExperimentConfig, run_experiment

with tempfile.TemporaryDirectory() as out:
    print("=== NMSE vs SNR (OFDM, -200 ppm, eps = 300e-6) ===")
    s = run_experiment(ExperimentConfig(
        experiment="ex4", trials=10, ber_trials=0, seed=0, output_path=out))
    for a in s.aggregates:
        print(f"  SNR {a['sweep_value']:5.1f} dB -> mean NMSE "
              f"{a['mean_nmse_post_db']:7.2f} dB")
    print("post-compensation error sits on the noise floor at every SNR\n")

    print("=== NMSE vs rate offset (SNR 30 dB) ===")
    s = run_experiment(ExperimentConfig(
        experiment="ex5", trials=10, ber_trials=0, seed=0, output_path=out))
    for a in s.aggregates:
        print(f"  delta {a['sweep_value']:+7.1f} ppm -> mean NMSE "
              f"{a['mean_nmse_post_db']:7.2f} dB")
    print("the compensated error is flat across +-1000 ppm: the estimator")
    print("tracks the drift and the residual is noise-limited")

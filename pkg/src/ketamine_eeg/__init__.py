"""Forehead quantitative-EEG pipeline for ketamine treatment-response studies.

Submodules: signal_model (recordings and CSV I/O), preprocess (zero-phase
FIR bandpass), spectrum (Welch PSD), features (band power, asymmetry,
cordance), clinical (HDRS-17 labeling), stats (exact Wilcoxon tests and
Hochberg control), ml (classifiers and cross-validation), synth
(synthetic cohorts) and cli / pipeline (the study subcommands).
"""

__version__ = "0.1.0"

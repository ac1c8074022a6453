"""EEG preference classification: db8 wavelet band features, RFE/SBS
selection and a from-scratch classifier suite, with a seeded synthetic
EEG generator for end-to-end checks."""

__version__ = "0.1.0"

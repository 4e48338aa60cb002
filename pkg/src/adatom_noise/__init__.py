"""Electric-field noise from adatoms fluctuating on ion-trap electrodes."""

__version__ = "0.1.0"

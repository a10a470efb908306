SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K

THZ_BAND_LOW = 100e9  # Hz
THZ_BAND_HIGH = 10e12  # Hz

DEFAULT_REFERENCE_TEMPERATURE = 296.0  # K
DEFAULT_ELECTRONIC_NOISE_TEMPERATURE = 290.0  # K
DEFAULT_GRID_STEP = 1e9  # Hz
DEFAULT_SNR_THRESHOLD = 10.0
DEFAULT_LOSS_THRESHOLD_DB = 10.0
DEFAULT_SLEEP_POWER_FACTOR = 0.01

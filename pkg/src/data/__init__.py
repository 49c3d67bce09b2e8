from src.data.dataset import CsvSchema, Dataset, GeoPoint, LoadReport, load_csv, save_csv
from src.data.normalization import DatasetNormalizer, MinMaxScaler, fit_apply_minmax, fit_normalizer
from src.data.split import Split, train_test_split
from src.data.synthetic import synth_generate, synthetic_field

__all__ = [
    "CsvSchema", "Dataset", "GeoPoint", "LoadReport", "load_csv", "save_csv",
    "DatasetNormalizer", "MinMaxScaler", "fit_apply_minmax", "fit_normalizer",
    "Split", "train_test_split", "synth_generate", "synthetic_field",
]

from data.xor import Dataset, DatasetError, gen_xor, load_csv, parity_labels, save_csv

__all__ = ["Dataset", "DatasetError", "gen_xor", "load_csv", "parity_labels", "save_csv"]

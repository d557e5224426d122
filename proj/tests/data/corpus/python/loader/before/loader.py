import pickle
import yaml


def load_config(path):
    with open(path) as fh:
        return yaml.load(fh)


def load_state(blob):
    return pickle.loads(blob)


class Store:
    def __init__(self, path):
        self.path = path

    def read(self):
        return load_config(self.path)

import logging

import orjson

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


class JsonFileHandler(logging.FileHandler):
    def __init__(self, filename, mode="a", encoding=None, delay=False):
        super().__init__(filename, mode, encoding, delay)

    def emit(self, record):
        json_data = orjson.loads(self.format(record))
        with open(self.baseFilename, "wb") as f:
            f.write(orjson.dumps(json_data, option=JSON_OPTIONS))


class JsonFormatter(logging.Formatter):
    def format(self, record):
        if isinstance(record.msg, (bytes, str)):
            return record.msg
        return orjson.dumps(record.msg, option=JSON_OPTIONS).decode("utf-8")

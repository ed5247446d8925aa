import logging

from pcs.utils import LOGGER_NAME, dict2str, get_num_workers, get_root_logger


def test_get_root_logger():
    logger = get_root_logger()
    assert logger is logging.getLogger(LOGGER_NAME)
    num_handlers = len(logger.handlers)
    # later calls return the same logger without adding handlers
    assert get_root_logger(log_level=logging.WARNING) is logger
    assert len(logger.handlers) == num_handlers


def test_dict2str():
    text = dict2str({'name': 'twoball', 'prior': {'type': 'ball_mixture', 'radius': 1.0}})
    assert '  name: twoball\n' in text
    assert '  prior:[' in text and '    radius: 1.0\n' in text


def test_get_num_workers(monkeypatch):
    monkeypatch.setenv('PCS_THREADS', '2')
    assert get_num_workers() <= 2
    assert get_num_workers(1) == 1
    monkeypatch.setenv('PCS_THREADS', 'many')
    assert get_num_workers(1) == 1
    monkeypatch.delenv('PCS_THREADS')
    assert get_num_workers(0) == 1

import logging

from scripts.core.logger import PACKAGE_LOGGER, ScriptLogger, get_logger, resolve_level
from scripts.planner.sample_graph import Resolutions


def test_resolve_level(monkeypatch):
    assert resolve_level('debug') == logging.DEBUG
    assert resolve_level('nonsense') == logging.INFO
    monkeypatch.setenv('LOG_LEVEL', 'WARNING')
    assert resolve_level() == logging.WARNING


def test_module_records_reach_the_log_file(tmp_path):
    log = ScriptLogger('unit', log_file=str(tmp_path / 'logs' / 'unit.log'), console_output=False)
    log.section('TITLE', width=10)
    log.resolutions('initial', 21, Resolutions(d=0.5, eps=1.0, rho=1.0, delta=0.4, beta=0.6))
    logging.getLogger(f"{PACKAGE_LOGGER}.planner.value_iteration").info('from the planner')
    log.close()
    text = log.log_file.read_text()
    assert '=' * 10 in text
    assert 'initial: |V|=21 d=0.5 eps=1 rho=1 beta=0.6' in text
    assert 'from the planner' in text


def test_new_logger_replaces_handlers(tmp_path):
    ScriptLogger('first', log_file=str(tmp_path / 'a.log'), console_output=False)
    ScriptLogger('second', console_output=False)
    assert logging.getLogger(PACKAGE_LOGGER).handlers == []


def test_quiet_console_and_no_bar(tmp_path, capsys):
    log = ScriptLogger('quiet', quiet=True)
    log.info('hidden')
    log.warning('shown')
    assert list(log.progress(range(3), total=3)) == [0, 1, 2]
    out = capsys.readouterr().out
    assert 'shown' in out and 'hidden' not in out
    log.close()


def test_get_logger_names_the_file(tmp_path, monkeypatch):
    monkeypatch.setenv('LOG_DIR', str(tmp_path))
    log = get_logger('ipolicy_run', quiet=True)
    assert log.log_file.parent == tmp_path
    assert log.log_file.name.startswith('ipolicy_run_')
    log.close()
    assert get_logger('x', to_file=False).log_file is None

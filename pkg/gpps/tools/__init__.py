from gpps.tools.csv_sink import CSVSink
from gpps.tools.json_sink import JSONSink
from gpps.tools.snapshot import read_snapshot, write_snapshot

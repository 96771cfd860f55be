from dataclasses import dataclass
import pathlib


FORMATS = ('json', 'csv', 'both')


@dataclass
class ReportFiles:
    """Stores where a report (a JSON document and/or a CSV table) is written.

    Attributes
    ----------
    out_dir : str
        Directory where the report files are stored.
    stem : str
        File name without extension, e.g. ``'solve'``.
    fmt : str
        One of ``'json'``, ``'csv'`` or ``'both'``.
    """
    out_dir: str
    stem: str
    fmt: str = 'both'

    @property
    def json_path(self):
        """Path to the JSON document of the report.

        Returns
        -------
        pathlib.Path
            ``<out_dir>/<stem>.json``
        """
        return pathlib.Path(self.out_dir, f'{self.stem}.json')

    @property
    def csv_path(self):
        """Path to the CSV table of the report.

        Returns
        -------
        pathlib.Path
            ``<out_dir>/<stem>.csv``
        """
        return pathlib.Path(self.out_dir, f'{self.stem}.csv')

    @property
    def wants_json(self):
        return self.fmt in ('json', 'both')

    @property
    def wants_csv(self):
        return self.fmt in ('csv', 'both')

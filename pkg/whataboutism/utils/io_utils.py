import json
import logging
import pathlib

from whataboutism import exceptions

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every IEEE-754 double.
FLOAT_FORMAT = '%.17g'


def read_json(path, what='configuration'):
    """Reads a UTF-8 JSON document from disk.

    Parameters
    ----------
    path : str or pathlib.Path
        Location of the document.
    what : str
        Human readable name of the document, used in error messages.

    Returns
    -------
    object
        The decoded JSON value.

    Raises
    ------
    exceptions.ConfigNotFound
        If no file exists at `path`.
    exceptions.ValidationError
        If the file is not valid JSON.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise exceptions.ConfigNotFound(
            f'Could not find the {what} file {path}.'
        )

    with open(path, 'r', encoding='utf-8') as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as e:
            raise exceptions.ValidationError(
                f'The {what} file {path} is not valid JSON: {e}'
            ) from e


def write_json(path, document):
    """Writes `document` as indented UTF-8 JSON, creating parent directories.

    Floats are written with ``repr``, which is the shortest string that
    reads back to the identical double.

    Returns
    -------
    pathlib.Path
        The path that was written.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(exist_ok=True, parents=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2)
        handle.write('\n')
    logger.debug('Wrote %s', path)
    return path


def write_csv(path, frame):
    """Writes a pandas DataFrame as comma separated UTF-8 with a header row.

    Returns
    -------
    pathlib.Path
        The path that was written.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(exist_ok=True, parents=True)
    frame.to_csv(path, index=False, sep=',', float_format=FLOAT_FORMAT,
                 encoding='utf-8', lineterminator='\n')
    logger.debug('Wrote %s (%d rows)', path, len(frame))
    return path


def write_report(report_files, document=None, frame=None):
    """Writes the JSON and/or CSV parts of a report.

    Parameters
    ----------
    report_files : ReportFiles
        Where to write and in which format(s).
    document : object, optional
        JSON-serializable report body.
    frame : pandas.DataFrame, optional
        Tabular report body.

    Returns
    -------
    list[pathlib.Path]
        The files that were written.
    """
    written = []
    if report_files.wants_json and document is not None:
        written.append(write_json(report_files.json_path, document))
    if report_files.wants_csv and frame is not None:
        written.append(write_csv(report_files.csv_path, frame))
    return written

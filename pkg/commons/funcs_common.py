from commons.constants import NEARGROUP_VERSION, EXIT_VERIFICATION_FAIL, EXIT_INPUT_ERROR, EXIT_RESOURCE_ERROR

import argparse
import sys
import texttable


class NearGroupError(Exception):
    """
    Base error of the package. exit_code is the CLI exit status the error maps to.
    """
    exit_code = EXIT_VERIFICATION_FAIL

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.msg = msg
        self.report = report


class InputError(NearGroupError):
    exit_code = EXIT_INPUT_ERROR


class VerificationError(NearGroupError):
    exit_code = EXIT_VERIFICATION_FAIL


class ResourceError(NearGroupError):
    exit_code = EXIT_RESOURCE_ERROR


class CustomHelpFormatter(argparse.RawTextHelpFormatter):
    """
    --help formatting class
    """
    def __init__(self, prog, indent_increment=2, max_help_position=5, width=100):
        super().__init__(prog, indent_increment=indent_increment, max_help_position=max_help_position, width=width)

    def _format_action_invocation(self, action):
        if not action.option_strings or action.nargs == 0:
            return super()._format_action_invocation(action)
        default = self._get_default_metavar_for_optional(action)
        args_string = self._format_args(action, default)
        return ', '.join(action.option_strings) + ' ' + args_string


def get_neargroup_version():
    """
    ## Changes

    ### common
    * Solution archive with re-verification on load
    * NEARGROUP_TOLERANCE environment override

    ### solvers
    * Exact case-feasibility certificates for m=2n

    :return: NEARGROUP version
    """
    return NEARGROUP_VERSION


def get_elapsed_time_msg(end_time, start_time):
    """
    Builds the elapsed time message shown after each command
    :param end_time:
    :param start_time:
    :return: formatted elapsed time
    """

    s_time = float(start_time)
    e_time = float(end_time)
    elapse_time = e_time - s_time

    return f"Elapsed Time: {elapse_time:.2f} Sec."


def get_start_time_msg(time):
    return f"\n  ::: {time:%Y-%m-%d %H:%M:%S} ::: "


def print_error_msg(err, exit_code=EXIT_VERIFICATION_FAIL):
    """
    Prints the reason of a forced termination in the fixed format and exits with exit_code
    :param err: error message
    :param exit_code: process exit status
    """
    print()
    print("This program was terminated by force for the following reasons: ")
    print(f"  {err}")
    sys.exit(exit_code)


def complex_to_pair(z):
    return [float(complex(z).real), float(complex(z).imag)]


def pair_to_complex(pair):
    return complex(float(pair[0]), float(pair[1]))


def format_complex(z, digits=6):
    z = complex(z)
    if abs(z.imag) < 10 ** (-digits):
        return f"{z.real:.{digits}f}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.{digits}f}{sign}{abs(z.imag):.{digits}f}i"


def _view_title(title):
    return f"\n  [{title}]\n"


def view_key_values(header, key_values):

    kv_tab = texttable.Texttable()
    kv_tab.set_deco(texttable.Texttable.HEADER | texttable.Texttable.VLINES)
    kv_tab.set_cols_width([24, 40])
    kv_tab.set_cols_align(["r", "l"])
    kv_tab.set_cols_dtype(["t", "t"])
    kv_tab.header([f"[{header}]", ""])

    for x, y in key_values.items():
        kv_tab.add_row([x, y])

    return f"\n{kv_tab.draw()}\n"


def view_table(header, rows, widths=None, align=None):

    tab = texttable.Texttable()
    tab.set_deco(texttable.Texttable.HEADER | texttable.Texttable.VLINES)
    if widths is not None:
        tab.set_cols_width(widths)
    tab.set_cols_align(align if align is not None else ["l"] * len(header))
    tab.set_cols_dtype(["t"] * len(header))
    tab.header(header)

    for row in rows:
        tab.add_row([str(x) for x in row])

    return f"\n{tab.draw()}\n"


def view_config_file(config):
    return _view_title(f"File: {config.get('config_name')}") \
           + view_key_values("Setting Info.", config.get("setting")) \
           + view_key_values("Search Info.", config.get("search")) \
           + view_key_values("Archive Info.", config.get("archive"))


def view_residual_report(report):
    """
    Residual table of a ResidualReport (equation, max residual, status)
    """
    rows = []
    for name, value in report.residuals.items():
        status = "info" if name in report.informational else ("ok" if value < report.tolerance else "FAIL")
        rows.append([name, f"{value:.3e}", status])
    return view_table(["Equation", "Max residual", "Status"], rows, widths=[28, 14, 8], align=["l", "r", "l"]) \
        + f"\n  Overall: {report.overall:.3e} (tol {report.tolerance:.1e}) ... {'Pass' if report.passed else 'Fail'}\n"

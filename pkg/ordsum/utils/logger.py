import os
import datetime
import logging

from tensorboardX import SummaryWriter

_scalars = logging.getLogger("ordsum.scalars")


class Logger(object):
    def __init__(self, log_dir=None, log_hist=True):
        """Create a summary writer logging to log_dir. Without a log_dir scalars only reach the log."""
        self.writer = None
        if log_dir is not None:
            if log_hist:    # Check a new folder for each log should be created
                log_dir = os.path.join(
                    log_dir,
                    datetime.datetime.now().strftime("%Y_%m_%d__%H_%M_%S"))
            self.writer = SummaryWriter(log_dir)

    def scalar_summary(self, tag, value, step):
        """Log a scalar variable."""
        _scalars.info("%s step=%s value=%s", tag, step, value)
        if self.writer is not None:
            self.writer.add_scalar(tag, float(value), step)

    def list_of_scalars_summary(self, tag_value_pairs, step):
        """Log scalar variables."""
        for tag, value in tag_value_pairs:
            self.scalar_summary(tag, value, step)

    def close(self):
        if self.writer is not None:
            self.writer.close()

"""
Wall-clock limit for a single seeded run.
"""
import signal
import threading

class Timeout():
    """Timeout class using ALARM signal."""
    class Timeout(Exception):
        pass

    def __init__(self, sec: int=None):
        self.sec = sec
        self.previous = None

    def armed(self) -> bool:
        # SIGALRM can only be installed from the main thread.
        return self.sec is not None and threading.current_thread() is threading.main_thread()

    def __enter__(self):
        if self.armed():
            self.previous = signal.signal(signal.SIGALRM, self.raise_timeout)
            signal.alarm(int(self.sec))
        return self

    def __exit__(self, *args):
        if self.armed():
            signal.alarm(0)    # disable alarm
            signal.signal(signal.SIGALRM, self.previous or signal.SIG_DFL)

    def raise_timeout(self, *args):
        raise Timeout.Timeout()

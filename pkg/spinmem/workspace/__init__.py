from spinmem.workspace.workspace import Workspace

__all__ = [
    "Workspace",
]

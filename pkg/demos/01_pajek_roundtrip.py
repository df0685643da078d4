"""Write a small network and partition in Pajek form, then read them back.

Run with ``python demos/01_pajek_roundtrip.py``.
"""
from __future__ import annotations

from commstab import OneModeNetwork, Partition
from commstab.netmodel import read_pajek_net, read_partition_clu, write_pajek_net, write_partition_clu


def main() -> None:
    # three members of a forum; arc weight = number of comments a -> b
    net = OneModeNetwork(("ana", "ben", "cleo"), {("ana", "ben"): 4, ("ben", "ana"): 1, ("cleo", "ana"): 2})
    text = write_pajek_net(net)
    print(text)

    back = read_pajek_net(text)
    print("same arcs after reading back:", back.arcs == net.arcs)

    part = Partition(net.actors, [1, 1, 2])
    clu = write_partition_clu(part)
    print(clu)
    print("same partition:", read_partition_clu(clu, net.actors) == part)


if __name__ == "__main__":
    main()

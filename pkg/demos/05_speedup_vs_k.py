"""How the minimum chip side trades pixels for batching convenience.

Small k hugs the objects tightly; large k pads every crop out to a big
square. The best-case speedup (noise-free oracle) falls monotonically
as k grows, and an empty scene gets the full skip: only the coarsest
scale is ever touched.
"""

from focuscascade import (
    BoxPx,
    PyramidConfig,
    Scene,
    SceneObject,
    SceneSpec,
    Space,
    speedup_bound,
    synth_scene,
)


def main():
    config = PyramidConfig.from_pairs([(480, 512), (800, 1280), (1400, 2000)])
    scene = synth_scene(SceneSpec(1600, 1200, n_small=4, n_medium=0, n_large=0), seed=11)
    print(f"scene {scene.width}x{scene.height}, {len(scene.objects)} small objects")

    print("\n   k    best-case speedup")
    for k, speedup in speedup_bound(scene, config, ks=(64, 128, 256, 512)):
        print(f"   {k:4d}  {speedup:.3f}x")

    empty = Scene(image_id=0, width=1600, height=1200, objects=())
    (_, s), = speedup_bound(empty, config, ks=(128,))
    print(f"\nempty scene: {s:.3f}x (exactly baseline over the coarsest scale)")

    crowded = Scene(
        image_id=1,
        width=1600,
        height=1200,
        objects=tuple(
            SceneObject(BoxPx(80.0 * i, 60.0 * i, 50.0, 50.0, Space.original()), 1)
            for i in range(12)
        ),
    )
    (_, s), = speedup_bound(crowded, config, ks=(512,))
    print(f"12 objects spread diagonally at k=512: {s:.3f}x (chips cover almost everything)")


if __name__ == "__main__":
    main()

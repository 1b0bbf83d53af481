    task_plan = [
        # Approach the glass with yellowish liquid with moderate speed and a grasp that
        # allows for a secure pick-up while avoiding obstacles.
        (0, 'approach', ('glass with yellowish liquid', 0.7, 0.01, 'side')),
        # Pick the glass from the side to avoid obstructing the grip if the glass is
        # wider at the top. Moderate speed chosen for better accuracy
        (1, 'pick', ('glass with yellowish liquid', 0.7, 0.01, 'side')),
        # Move to the storage shelf, identified as the most logical place for kitchenware,
        # with care to maintain speed that balances efficiency and safety of liquid
        # containment.
        (2, 'place', ('storage shelf', 0.9, 0.7, 0.01)),
        # The place action assumes the robot is at the location with the object, we do not
        # need to use approach beforehand, and must be careful with the orientation of
        # the glass since it contains liquid.
        (3, 'place', ('storage shelf', 0.9, 0.7, 0.01))
    ]

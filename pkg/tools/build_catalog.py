"""Regenerate the authored MCC table and goods/services catalog (JSON).

Catalog contents are hand-authored defaults, not measured data. Edit the
tables below and rerun:

    python tools/build_catalog.py
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "synthcard" / "data"

# code: (description, storefront noun used for generated names, chain-eligible)
MCCS = {
    742: ("Veterinary Services", "Animal Clinic", False),
    1711: ("Heating, Plumbing, A/C Contractors", "Plumbing", False),
    4111: ("Local and Suburban Commuter Transportation", "Transit", False),
    4112: ("Passenger Railways", "Rail", True),
    4121: ("Taxicabs and Limousines", "Cab Co", True),
    4131: ("Bus Lines", "Coach Lines", True),
    4214: ("Motor Freight Carriers and Moving", "Movers", False),
    4215: ("Courier Services", "Courier", True),
    4225: ("Public Warehousing and Storage", "Self Storage", True),
    4411: ("Steamship and Cruise Lines", "Cruises", True),
    4511: ("Airlines and Air Carriers", "Airways", True),
    4722: ("Travel Agencies and Tour Operators", "Travel", True),
    4784: ("Tolls and Bridge Fees", "Toll Authority", False),
    4814: ("Telecommunication Services", "Wireless", True),
    4829: ("Wire Transfers and Money Orders", "Money Transfer", True),
    4899: ("Cable, Satellite and Pay Television", "Cable", True),
    4900: ("Utilities", "Power & Light", False),
    5045: ("Computers and Peripheral Equipment", "Computers", True),
    5047: ("Medical and Dental Equipment", "Medical Supply", False),
    5094: ("Precious Stones and Metals, Watches and Jewelry", "Jewelers", False),
    5200: ("Home Supply Warehouse Stores", "Home Center", True),
    5211: ("Lumber and Building Materials", "Lumber", False),
    5251: ("Hardware Stores", "Hardware", True),
    5261: ("Nurseries and Lawn and Garden Supply", "Garden Center", False),
    5300: ("Wholesale Clubs", "Wholesale Club", True),
    5309: ("Duty Free Stores", "Duty Free", True),
    5310: ("Discount Stores", "Discount", True),
    5311: ("Department Stores", "Department Store", True),
    5411: ("Grocery Stores and Supermarkets", "Market", True),
    5422: ("Freezer and Locker Meat Provisioners", "Butcher", False),
    5441: ("Candy, Nut and Confectionery Stores", "Sweets", True),
    5451: ("Dairy Products Stores", "Creamery", False),
    5462: ("Bakeries", "Bakery", False),
    5499: ("Misc Food Stores and Convenience Stores", "Quick Stop", True),
    5511: ("Car and Truck Dealers", "Motors", False),
    5533: ("Automotive Parts and Accessories", "Auto Parts", True),
    5541: ("Service Stations", "Fuel", True),
    5542: ("Automated Fuel Dispensers", "Gas", True),
    5651: ("Family Clothing Stores", "Apparel", True),
    5655: ("Sports and Riding Apparel Stores", "Athletic Wear", True),
    5661: ("Shoe Stores", "Shoes", True),
    5691: ("Men's and Women's Clothing Stores", "Outfitters", True),
    5712: ("Furniture and Home Furnishings", "Furniture", True),
    5722: ("Household Appliance Stores", "Appliances", True),
    5732: ("Electronics Stores", "Electronics", True),
    5733: ("Music Stores and Musical Instruments", "Music", False),
    5734: ("Computer Software Stores", "Software", True),
    5735: ("Record Stores", "Records", True),
    5812: ("Eating Places and Restaurants", "Grill", True),
    5813: ("Drinking Places (Bars, Taverns, Nightclubs)", "Tavern", False),
    5814: ("Fast Food Restaurants", "Burgers", True),
    5815: ("Digital Goods: Media", "Media", True),
    5816: ("Digital Goods: Games", "Games", True),
    5912: ("Drug Stores and Pharmacies", "Pharmacy", True),
    5921: ("Package Stores: Beer, Wine and Liquor", "Liquors", False),
    5940: ("Bicycle Shops", "Cycles", False),
    5941: ("Sporting Goods Stores", "Sports", True),
    5942: ("Book Stores", "Books", True),
    5943: ("Stationery and Office Supplies", "Office Supply", True),
    5944: ("Jewelry, Watch, Clock and Silverware Stores", "Jewelry", True),
    5945: ("Hobby, Toy and Game Shops", "Toys", True),
    5947: ("Gift, Card, Novelty and Souvenir Shops", "Gifts", True),
    5968: ("Direct Marketing: Subscription", "Subscriptions", True),
    5970: ("Artist and Craft Shops", "Crafts", True),
    5975: ("Hearing Aids", "Hearing", True),
    5977: ("Cosmetic Stores", "Beauty", True),
    5992: ("Florists", "Flowers", False),
    5993: ("Cigar Stores and Stands", "Tobacco", False),
    5994: ("News Dealers and Newsstands", "News", False),
    5995: ("Pet Shops, Pet Food and Supplies", "Pet Supply", True),
    5999: ("Miscellaneous and Specialty Retail", "Shop", False),
    6300: ("Insurance Sales and Premiums", "Insurance", True),
    7011: ("Hotels, Motels and Resorts", "Hotel", True),
    7210: ("Laundry, Cleaning and Garment Services", "Dry Cleaners", False),
    7211: ("Laundries: Family and Commercial", "Laundromat", False),
    7230: ("Beauty and Barber Shops", "Salon", True),
    7276: ("Tax Preparation Services", "Tax Service", True),
    7298: ("Health and Beauty Spas", "Spa", False),
    7342: ("Exterminating Services", "Pest Control", False),
    7349: ("Cleaning and Maintenance Services", "Cleaning", False),
    7512: ("Automobile Rental Agency", "Car Rental", True),
    7523: ("Parking Lots and Garages", "Parking", True),
    7538: ("Automotive Service Shops", "Auto Service", True),
    7542: ("Car Washes", "Car Wash", False),
    7832: ("Motion Picture Theaters", "Cinemas", True),
    7922: ("Theatrical Producers and Ticket Agencies", "Tickets", True),
    7941: ("Commercial Sports and Athletic Fields", "Stadium", False),
    7995: ("Betting and Casino Gambling", "Casino", True),
    7996: ("Amusement Parks and Carnivals", "Amusement Park", True),
    7997: ("Membership Clubs and Fitness Centers", "Fitness", True),
    8011: ("Doctors and Physicians", "Medical Group", False),
    8021: ("Dentists and Orthodontists", "Dental", False),
    8043: ("Opticians and Eyeglasses", "Optical", True),
    8062: ("Hospitals", "Hospital", False),
    8111: ("Legal Services and Attorneys", "Law Office", False),
    8211: ("Elementary and Secondary Schools", "School", False),
    8220: ("Colleges and Universities", "College", False),
    8351: ("Child Care Services", "Child Care", False),
    8398: ("Charitable Organizations", "Foundation", False),
    9311: ("Tax Payments", "Revenue Dept", False),
    9402: ("Postal Services", "Post Office", False),
}

KNOTS = [15000, 30000, 60000, 120000, 250000]
PARTICIPATION = {
    "all": [0.97, 0.97, 0.97, 0.97, 0.97],
    "common": [0.75, 0.8, 0.85, 0.85, 0.85],
    "half": [0.4, 0.45, 0.5, 0.55, 0.6],
    "affluent": [0.05, 0.12, 0.25, 0.45, 0.65],
    "rich": [0.01, 0.03, 0.08, 0.2, 0.4],
    "lower": [0.6, 0.5, 0.35, 0.2, 0.1],
    "some": [0.15, 0.2, 0.25, 0.3, 0.35],
    "rare": [0.03, 0.05, 0.08, 0.1, 0.12],
}
SPEND = {
    "flat": [0.85, 0.92, 1.0, 1.1, 1.25],
    "mild": [0.7, 0.85, 1.0, 1.25, 1.6],
    "steep": [0.5, 0.7, 1.0, 1.5, 2.4],
    "lux": [0.35, 0.55, 1.0, 1.9, 3.5],
}
TOD = {
    "day": [4, 5, 1],
    "morning": [8, 3, 1],
    "lunch": [3, 6, 3],
    "meal": [2, 5, 6],
    "evening": [1, 3, 8],
    "bar": [1, 2, 8],
    "office": [4, 5, 0.3],
    "any": [1, 1, 1],
}
WEEK = {"flat": [1, 1], "weekday": [1.3, 0.4], "weekend": [0.8, 1.8]}
CTX = {
    "home": [1, 0.2, 0.1],
    "homeonly": [1, 0, 0],
    "everywhere": [1, 1, 1],
    "travel": [1, 2.5, 2.2],
    "trip": [0.02, 6, 6],
    "vacation": [0.05, 5, 0.5],
    "commute": [1, 0.3, 0.8],
}

# name, mccs, freq(mean, std)/yr, tod, week, ctx, participation, spend(base USD, curve, cv),
# online affinity (scale on the era online share), fraud weight, retirement multiplier
ITEMS = [
    ("groceries", [5411, 5300, 5310, 5311], (70, 30), "day", "weekend", "home", "all", (65, "mild", 0.6), 0.6, 1.0, 1.0),
    ("convenience snack", [5499, 5541], (30, 25), "any", "flat", "everywhere", "common", (8, "flat", 0.5), 0.0, 0.2, 0.7),
    ("fast food meal", [5814], (40, 30), "lunch", "flat", "travel", "common", (11, "flat", 0.4), 0.6, 0.3, 0.7),
    ("coffee", [5814, 5499], (45, 60), "morning", "weekday", "everywhere", "half", (5.5, "flat", 0.3), 0.2, 0.1, 0.7),
    ("restaurant meal", [5812], (24, 18), "meal", "weekend", "travel", "common", (45, "steep", 0.6), 0.4, 0.6, 1.0),
    ("breakfast diner", [5812, 5814], (8, 8), "morning", "weekend", "travel", "half", (18, "mild", 0.4), 0.0, 0.2, 1.3),
    ("pizza", [5814, 5812], (10, 8), "evening", "weekend", "home", "common", (24, "flat", 0.4), 1.2, 0.3, 0.7),
    ("ice cream", [5451, 5814, 5441], (5, 5), "evening", "weekend", "travel", "half", (7, "flat", 0.4), 0.0, 0.0, 0.9),
    ("bar drinks", [5813], (12, 14), "bar", "weekend", "travel", "half", (32, "mild", 0.6), 0.0, 0.3, 0.6),
    ("bakery goods", [5462, 5411], (8, 8), "morning", "weekend", "home", "half", (14, "flat", 0.5), 0.1, 0.1, 1.2),
    ("candy", [5441, 5499, 5411], (3, 3), "day", "flat", "everywhere", "half", (9, "flat", 0.5), 0.6, 0.1, 0.8),
    ("meat market", [5422, 5411], (3, 3), "day", "weekend", "homeonly", "some", (55, "mild", 0.5), 0.2, 0.1, 1.1),
    ("liquor", [5921, 5411], (8, 8), "evening", "weekend", "home", "half", (30, "mild", 0.5), 0.3, 0.5, 0.9),
    ("tobacco", [5993, 5499, 5541], (12, 15), "any", "flat", "everywhere", "lower", (10, "flat", 0.3), 0.0, 0.3, 0.8),
    ("gasoline", [5541, 5542], (36, 18), "day", "flat", "commute", "all", (42, "flat", 0.4), 0.0, 1.0, 0.7),
    ("auto repair", [7538, 5533], (2, 1.5), "office", "weekday", "homeonly", "common", (380, "mild", 0.8), 0.0, 0.3, 1.0),
    ("auto parts", [5533, 5311, 5310], (2, 2), "day", "weekend", "homeonly", "half", (60, "flat", 0.7), 1.0, 0.5, 0.8),
    ("car wash", [7542], (6, 6), "day", "weekend", "homeonly", "half", (15, "flat", 0.3), 0.0, 0.1, 0.9),
    ("parking", [7523], (10, 12), "day", "weekday", "travel", "half", (12, "mild", 0.6), 0.3, 0.1, 0.6),
    ("tolls", [4784], (15, 20), "day", "weekday", "commute", "some", (6, "flat", 0.4), 0.5, 0.0, 0.5),
    ("taxi", [4121], (5, 8), "evening", "flat", "trip", "half", (25, "mild", 0.5), 0.8, 0.4, 0.9),
    ("public transit", [4111, 4131], (20, 30), "day", "weekday", "commute", "lower", (3, "flat", 0.3), 0.6, 0.1, 0.7),
    ("train ticket", [4112], (0.6, 0.8), "day", "flat", "trip", "some", (70, "mild", 0.6), 1.5, 0.6, 1.0),
    ("bus ticket", [4131], (0.5, 0.6), "day", "flat", "trip", "lower", (45, "flat", 0.5), 1.2, 0.3, 1.0),
    ("airline ticket", [4511, 4722], (1.5, 1.2), "office", "weekday", "home", "half", (420, "steep", 0.6), 3.0, 3.0, 1.3),
    ("hotel stay", [7011], (2, 2), "evening", "flat", "trip", "common", (280, "steep", 0.6), 2.0, 2.0, 1.2),
    ("car rental", [7512], (0.8, 0.8), "day", "flat", "trip", "half", (240, "mild", 0.6), 1.5, 1.5, 1.1),
    ("cruise", [4411, 4722], (0.05, 0.1), "office", "flat", "home", "rich", (2200, "steep", 0.6), 2.5, 1.5, 2.5),
    ("tour package", [4722], (0.2, 0.2), "office", "flat", "home", "affluent", (1500, "steep", 0.6), 2.5, 2.0, 1.8),
    ("souvenirs", [5947, 5999, 5309], (0.5, 0.5), "day", "flat", "vacation", "common", (30, "mild", 0.8), 0.0, 0.3, 1.0),
    ("duty free", [5309, 5311], (0.2, 0.3), "day", "flat", "vacation", "some", (90, "steep", 0.7), 0.0, 0.5, 1.0),
    ("amusement park", [7996], (0.4, 0.5), "day", "weekend", "vacation", "half", (150, "mild", 0.5), 1.0, 0.4, 0.5),
    ("pharmacy prescription", [5912], (10, 8), "day", "weekday", "homeonly", "common", (25, "flat", 0.7), 0.6, 0.1, 1.8),
    ("drugstore sundries", [5912, 5411, 5310], (15, 12), "day", "flat", "everywhere", "all", (18, "flat", 0.6), 0.6, 0.3, 1.1),
    ("doctor visit", [8011], (4, 3), "office", "weekday", "homeonly", "common", (40, "mild", 0.8), 0.0, 0.0, 1.9),
    ("dentist", [8021], (1.5, 1), "office", "weekday", "homeonly", "common", (160, "mild", 0.8), 0.0, 0.0, 1.3),
    ("eyeglasses", [8043, 5310], (0.4, 0.4), "day", "weekend", "homeonly", "half", (240, "mild", 0.6), 0.6, 0.3, 1.5),
    ("hospital bill", [8062], (0.3, 0.3), "office", "weekday", "homeonly", "half", (900, "flat", 1.0), 0.5, 0.0, 2.2),
    ("medical supplies", [5047, 5912], (0.4, 0.5), "day", "weekday", "homeonly", "some", (90, "flat", 0.7), 1.2, 0.2, 2.5),
    ("hearing aid", [5975], (0.03, 0.04), "office", "weekday", "homeonly", "rare", (1800, "mild", 0.4), 0.4, 0.5, 6.0),
    ("clothing", [5651, 5691, 5311, 5310], (8, 6), "day", "weekend", "travel", "all", (70, "steep", 0.7), 1.6, 2.0, 0.7),
    ("shoes", [5661, 5311, 5651], (3, 2), "day", "weekend", "travel", "common", (80, "steep", 0.6), 1.5, 1.5, 0.7),
    ("sportswear", [5655, 5941], (2, 2), "day", "weekend", "home", "half", (65, "mild", 0.6), 1.5, 1.0, 0.5),
    ("necklace", [5094, 5944, 5311], (0.3, 0.3), "day", "weekend", "travel", "affluent", (320, "lux", 0.8), 1.2, 3.5, 0.8),
    ("watch", [5944, 5094, 5311], (0.15, 0.2), "day", "weekend", "travel", "affluent", (360, "lux", 0.9), 1.5, 3.5, 0.7),
    ("cosmetics", [5977, 5912, 5311], (5, 5), "day", "weekend", "everywhere", "common", (30, "mild", 0.6), 1.2, 0.8, 0.8),
    ("electronics gadget", [5732, 5311, 5045, 5310], (2, 2), "day", "weekend", "home", "common", (240, "steep", 0.8), 1.8, 4.0, 0.6),
    ("computer", [5045, 5732], (0.3, 0.3), "day", "weekend", "homeonly", "half", (1100, "steep", 0.5), 2.0, 4.0, 0.6),
    ("software", [5734, 5732], (1, 1.2), "day", "flat", "home", "half", (60, "mild", 0.8), 2.5, 1.5, 0.5),
    ("music and video", [5735, 5815, 5311], (4, 5), "evening", "weekend", "home", "half", (16, "flat", 0.6), 2.5, 0.6, 0.6),
    ("video games", [5816, 5945, 5732], (2, 3), "evening", "weekend", "home", "some", (50, "flat", 0.5), 2.5, 1.5, 0.3),
    ("books", [5942, 5994, 5311], (4, 4), "day", "weekend", "everywhere", "half", (22, "mild", 0.6), 2.0, 0.3, 1.3),
    ("newspapers and magazines", [5994, 5968], (6, 8), "morning", "flat", "everywhere", "half", (6, "flat", 0.4), 1.5, 0.1, 1.5),
    ("streaming subscription", [4899, 5968], (6, 6), "any", "flat", "homeonly", "half", (12, "flat", 0.3), 3.0, 0.5, 0.8),
    ("toys", [5945, 5311, 5310], (3, 3), "day", "weekend", "home", "half", (35, "steep", 0.7), 1.6, 0.8, 0.8),
    ("office supplies", [5943, 5310], (3, 3), "office", "weekday", "home", "half", (32, "flat", 0.7), 1.6, 0.6, 0.7),
    ("craft supplies", [5970, 5945], (2, 3), "day", "weekend", "homeonly", "some", (28, "mild", 0.6), 1.2, 0.2, 1.4),
    ("gift shop", [5947, 5999], (3, 3), "day", "weekend", "everywhere", "half", (30, "mild", 0.7), 1.0, 0.8, 1.1),
    ("florist", [5992], (1.5, 1.5), "day", "weekday", "home", "half", (55, "mild", 0.5), 1.5, 0.4, 1.2),
    ("furniture", [5712, 5311], (0.4, 0.4), "day", "weekend", "homeonly", "common", (820, "steep", 0.8), 1.0, 3.0, 0.8),
    ("home appliance", [5722, 5311, 5200], (0.4, 0.4), "day", "weekend", "homeonly", "common", (620, "steep", 0.7), 1.0, 3.0, 0.9),
    ("home improvement", [5200, 5211, 5251], (6, 6), "day", "weekend", "homeonly", "common", (90, "mild", 0.8), 0.6, 1.0, 0.9),
    ("garden supplies", [5261, 5200], (3, 3), "morning", "weekend", "homeonly", "half", (45, "mild", 0.7), 0.5, 0.2, 1.3),
    ("hardware tools", [5251, 5200], (3, 3), "day", "weekend", "homeonly", "common", (40, "flat", 0.7), 0.6, 0.8, 1.0),
    ("dry cleaning", [7210], (8, 10), "morning", "weekday", "homeonly", "half", (25, "mild", 0.4), 0.0, 0.0, 0.5),
    ("laundromat", [7211], (18, 20), "day", "weekend", "homeonly", "lower", (5, "flat", 0.3), 0.0, 0.0, 0.9),
    ("haircut", [7230], (8, 5), "day", "weekend", "homeonly", "all", (35, "steep", 0.5), 0.0, 0.0, 1.0),
    ("spa treatment", [7298], (1, 1.5), "day", "weekend", "vacation", "some", (130, "steep", 0.5), 0.5, 0.3, 1.0),
    ("pet food", [5995, 5411, 5310], (10, 8), "day", "weekend", "homeonly", "half", (35, "mild", 0.5), 1.2, 0.2, 1.1),
    ("veterinarian", [742], (1.5, 1.2), "office", "weekday", "homeonly", "half", (180, "mild", 0.7), 0.0, 0.0, 1.1),
    ("gym membership", [7997], (12, 4), "morning", "flat", "homeonly", "some", (45, "mild", 0.4), 1.0, 0.0, 0.7),
    ("movie tickets", [7832], (5, 5), "evening", "weekend", "everywhere", "common", (28, "flat", 0.4), 1.2, 0.2, 0.7),
    ("concert tickets", [7922], (1.5, 1.5), "evening", "weekend", "travel", "half", (120, "steep", 0.6), 2.5, 1.5, 0.6),
    ("sports event", [7941, 7922], (1, 1.2), "evening", "weekend", "travel", "some", (90, "steep", 0.6), 1.5, 0.8, 0.6),
    ("casino", [7995], (2, 4), "bar", "weekend", "vacation", "some", (80, "mild", 0.9), 0.3, 0.5, 1.4),
    ("sporting goods", [5941, 5311], (1.5, 1.5), "day", "weekend", "home", "half", (85, "mild", 0.7), 1.5, 1.0, 0.6),
    ("camping gear", [5941], (0.3, 0.4), "day", "weekend", "home", "some", (150, "mild", 0.7), 1.5, 0.8, 0.7),
    ("bicycle", [5940, 5941], (0.1, 0.15), "day", "weekend", "homeonly", "some", (480, "steep", 0.7), 1.2, 1.5, 0.6),
    ("musical instrument", [5733], (0.1, 0.15), "day", "weekend", "homeonly", "some", (400, "steep", 0.8), 1.5, 1.5, 0.7),
    ("phone bill", [4814], (12, 2), "any", "weekday", "homeonly", "all", (85, "mild", 0.3), 1.5, 0.5, 0.8),
    ("cable tv", [4899], (12, 2), "any", "weekday", "homeonly", "common", (95, "mild", 0.3), 1.5, 0.2, 1.1),
    ("utilities", [4900], (12, 2), "office", "weekday", "homeonly", "common", (140, "mild", 0.4), 1.2, 0.0, 1.0),
    ("insurance premium", [6300], (6, 4), "office", "weekday", "homeonly", "common", (160, "steep", 0.4), 1.2, 0.0, 1.2),
    ("charity donation", [8398], (2, 2), "day", "flat", "homeonly", "half", (75, "steep", 0.9), 1.5, 0.1, 1.8),
    ("tuition", [8220], (0.5, 0.5), "office", "weekday", "homeonly", "some", (2800, "mild", 0.6), 1.0, 0.2, 0.05),
    ("school fees", [8211], (1, 1.2), "office", "weekday", "homeonly", "some", (150, "mild", 0.6), 0.8, 0.0, 0.1),
    ("child care", [8351], (6, 6), "morning", "weekday", "homeonly", "some", (380, "steep", 0.5), 0.3, 0.0, 0.05),
    ("postage", [9402], (3, 3), "office", "weekday", "home", "common", (14, "flat", 0.6), 0.8, 0.1, 1.5),
    ("courier shipping", [4215], (1.5, 2), "office", "weekday", "home", "half", (30, "mild", 0.7), 1.5, 0.4, 1.0),
    ("money order", [4829], (1, 2), "day", "weekday", "home", "lower", (220, "flat", 0.8), 1.0, 1.5, 0.9),
    ("tax preparation", [7276], (0.8, 0.4), "office", "weekday", "homeonly", "half", (200, "steep", 0.5), 1.2, 0.1, 1.1),
    ("tax payment", [9311], (0.5, 0.6), "office", "weekday", "homeonly", "some", (850, "steep", 0.8), 1.5, 0.0, 1.0),
    ("legal services", [8111], (0.2, 0.3), "office", "weekday", "homeonly", "some", (520, "steep", 0.8), 0.4, 0.2, 1.3),
    ("house cleaning", [7349], (2, 4), "office", "weekday", "homeonly", "some", (120, "steep", 0.4), 0.8, 0.1, 1.6),
    ("pest control", [7342], (0.5, 0.6), "office", "weekday", "homeonly", "some", (150, "mild", 0.4), 0.6, 0.0, 1.2),
    ("plumbing repair", [1711], (0.5, 0.5), "office", "weekday", "homeonly", "half", (310, "mild", 0.7), 0.3, 0.1, 1.3),
    ("moving service", [4214], (0.1, 0.1), "office", "weekday", "homeonly", "some", (1200, "steep", 0.7), 1.0, 0.3, 0.8),
    ("self storage", [4225], (2, 4), "office", "flat", "homeonly", "rare", (110, "flat", 0.4), 1.0, 0.1, 1.0),
    ("car purchase deposit", [5511], (0.05, 0.05), "day", "weekend", "homeonly", "common", (2500, "steep", 0.6), 0.5, 1.0, 0.7),
    ("department store", [5311], (6, 5), "day", "weekend", "travel", "common", (60, "steep", 0.8), 1.4, 1.5, 0.9),
    ("discount store", [5310, 5300], (10, 8), "day", "weekend", "home", "common", (40, "flat", 0.7), 0.8, 0.8, 1.0),
    ("wholesale club", [5300], (8, 6), "day", "weekend", "homeonly", "half", (120, "mild", 0.6), 0.3, 0.8, 1.0),
    ("specialty retail", [5999, 5311], (4, 4), "day", "weekend", "everywhere", "half", (45, "mild", 0.8), 1.2, 0.8, 1.0),
]


def main():
    mcc = [
        {"code": code, "description": desc, "noun": noun, "chain": chain}
        for code, (desc, noun, chain) in sorted(MCCS.items())
    ]
    items = []
    for idx, (name, mccs, (fm, fs), tod, week, ctx, part, (base, curve, cv), online, fraud, retire) in enumerate(ITEMS):
        missing = [m for m in mccs if m not in MCCS]
        assert not missing, (name, missing)
        items.append({
            "gs_id": idx,
            "name": name,
            "mccs": mccs,
            "frequency": {"mean": fm, "std": fs, "spread_fraction": 0.7},
            "time_of_day_weights": TOD[tod],
            "weekday_weekend_weights": WEEK[week],
            "context_weights": CTX[ctx],
            "participation": PARTICIPATION[part],
            "spend_mean": [round(base * f, 2) for f in SPEND[curve]],
            "spend_cv": cv,
            "spend_spread_fraction": 0.5,
            "online_affinity": online,
            "fraud_weight": fraud,
            "retirement_multiplier": retire,
        })
    doc = {
        "_note": "Authored default catalog. Values are illustrative, not measured.",
        "income_knots": KNOTS,
        "items": items,
    }
    (OUT / "mcc.json").write_text(json.dumps(mcc, indent=1) + "\n")
    (OUT / "gs_catalog.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(len(mcc), "MCCs,", len(items), "items")


if __name__ == "__main__":
    main()
